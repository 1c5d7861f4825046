int main() {
int n, i, j, k;
scanf("%d",&n);
for(i=1; i<=n; i++)
{
for(j=1,z=i;j<=i;j++,k--)
    {
        if((k%2)==0)
         printf("*");
    }
}
return 0;
}
