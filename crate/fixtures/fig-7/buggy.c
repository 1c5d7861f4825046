int main()
{
int k,n,x,a[100];
scanf("%d",&n);
scanf("%d",&x);
for(i=0;i<n;i++)
   scanf("%d",&a[i]);
return 0;
}
